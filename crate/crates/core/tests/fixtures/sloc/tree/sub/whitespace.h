   
		

int x;
